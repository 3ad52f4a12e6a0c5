from django.apps import AppConfig


class SynthDataConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "synth_data"
