from django.apps import AppConfig


class UnimodalCnnConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "unimodal_cnn"
