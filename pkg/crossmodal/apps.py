from django.apps import AppConfig


class CrossmodalConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "crossmodal"
