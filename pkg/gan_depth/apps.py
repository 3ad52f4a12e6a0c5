from django.apps import AppConfig


class GanDepthConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "gan_depth"
