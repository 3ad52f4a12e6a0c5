"""Run the Django test suite under pytest with the same setup as `manage.py test`."""
import os

import django
import pytest

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "depth_hfr.settings")
django.setup()


@pytest.fixture(scope="session", autouse=True)
def django_test_environment():
    from django.test.runner import DiscoverRunner

    runner = DiscoverRunner(verbosity=0, interactive=False)
    runner.setup_test_environment()
    old_config = runner.setup_databases()
    yield
    runner.teardown_databases(old_config)
    runner.teardown_test_environment()
