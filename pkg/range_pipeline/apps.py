from django.apps import AppConfig


class RangePipelineConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "range_pipeline"
