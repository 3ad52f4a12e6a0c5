"""
Django settings for depth_hfr project.

The project has no web surface: Django provides the management commands
(the command-line interface), the ORM behind the run ledger and the
test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get("DEPTH_HFR_SECRET_KEY", "depth-hfr-local-only")

DEBUG = os.environ.get("DEPTH_HFR_DEBUG", "0") == "1"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "rest_framework",
    "range_pipeline",
    "synth_data",
    "gan_depth",
    "unimodal_cnn",
    "crossmodal",
    "matching",
    "harness",
]


# Database
# The run ledger (RunRecord / StageEntry) lives here.

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": os.environ.get("DEPTH_HFR_LEDGER", BASE_DIR / "ledger.sqlite3"),
    }
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

TIME_ZONE = "UTC"

USE_TZ = True


# Logging

LOG_LEVEL = os.environ.get("DEPTH_HFR_LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        app: {"handlers": ["console"], "level": LOG_LEVEL, "propagate": True}
        for app in (
            "range_pipeline",
            "synth_data",
            "gan_depth",
            "unimodal_cnn",
            "crossmodal",
            "matching",
            "harness",
        )
    },
}


# Experiments

# Default root for `run_all` workspaces when a config does not set `out_dir`.
DEPTH_HFR_RUNS_DIR = Path(os.environ.get("DEPTH_HFR_RUNS_DIR", BASE_DIR / "runs"))

# Long desk-scale training tests only run when this is set.
DEPTH_HFR_SLOW_TESTS = os.environ.get("DEPTH_HFR_SLOW_TESTS", "0") == "1"
