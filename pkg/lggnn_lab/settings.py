"""
Django settings for the lggnn_lab project.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / ".env")


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "django-insecure-lggnn-lab-local-key")

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv("DJANGO_DEBUG", "True").lower() == "true"

ALLOWED_HOSTS = [h for h in os.getenv("DJANGO_ALLOWED_HOSTS", "").split(",") if h]


INSTALLED_APPS = [
    # Django core apps
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",

    # Third-party apps
    "rest_framework",
    "django_celery_results",

    # Lab apps
    "graphons",
    "lggnn",
    "regression",
    "gcn",
    "evaluation",
    "experiments",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "lggnn_lab.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.debug",
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]

WSGI_APPLICATION = "lggnn_lab.wsgi.application"


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

# SQLite by default; PostgreSQL when USE_SQLITE=false
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

if os.getenv("USE_SQLITE", "true").lower() == "false":
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.postgresql",
            "NAME": os.getenv("POSTGRES_DB", "lggnn_lab"),
            "USER": os.getenv("POSTGRES_USER", "postgres"),
            "PASSWORD": os.getenv("POSTGRES_PASSWORD", "postgres"),
            "HOST": os.getenv("POSTGRES_HOST", "localhost"),
            "PORT": os.getenv("POSTGRES_PORT", "5432"),
            "CONN_MAX_AGE": 300,
        }
    }


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True

STATIC_URL = "static/"

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# DRF Configuration
REST_FRAMEWORK = {
    "DEFAULT_PERMISSION_CLASSES": [
        "rest_framework.permissions.IsAdminUser",
    ],
}


def _env_list(name, default):
    raw = os.getenv(name)
    if not raw:
        return default
    return [int(item) for item in raw.split(",") if item.strip()]


# Experiment defaults
LGGNN_SETTINGS = {
    "OUTPUT_DIR": Path(os.getenv("LGGNN_OUTPUT_DIR", BASE_DIR / "results")),
    "MC_SAMPLES": int(os.getenv("LGGNN_MC_SAMPLES", "100000")),
    "MAX_TEST_PAIRS": int(os.getenv("LGGNN_MAX_TEST_PAIRS", "200000")),
    "SUBSAMPLE_ABOVE_N": int(os.getenv("LGGNN_SUBSAMPLE_ABOVE_N", "2000")),
    "DEFAULT_SEEDS": _env_list("LGGNN_DEFAULT_SEEDS", [1, 2, 3]),
    "DEFAULT_N": int(os.getenv("LGGNN_DEFAULT_N", "1000")),
    "PG_TOL": float(os.getenv("LGGNN_PG_TOL", "1e-9")),
    "PG_MAX_ITER": int(os.getenv("LGGNN_PG_MAX_ITER", "100000")),
    "CORA_EDGE_LIST": Path(os.getenv("LGGNN_CORA_EDGE_LIST", BASE_DIR / "data" / "cora.edges")),
    "PARALLEL_SEEDS": os.getenv("LGGNN_PARALLEL_SEEDS", "false").lower() == "true",
}

# Logging Configuration
LOG_DIR = Path(os.getenv("LGGNN_LOG_DIR", BASE_DIR / "logs"))
LOG_DIR.mkdir(parents=True, exist_ok=True)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {message}",
            "style": "{",
        },
        "simple": {
            "format": "{levelname} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "level": os.getenv("LGGNN_CONSOLE_LOG_LEVEL", "WARNING"),
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
        "experiments_file": {
            "level": "INFO",
            "class": "logging.FileHandler",
            "filename": str(LOG_DIR / "experiments.log"),
            "formatter": "verbose",
        },
    },
    "loggers": {
        app: {
            "handlers": ["console", "experiments_file"],
            "level": os.getenv("LGGNN_LOG_LEVEL", "INFO"),
            "propagate": False,
        }
        for app in ("graphons", "lggnn", "regression", "gcn", "evaluation", "experiments")
    },
}

# Celery Configuration
CELERY_BROKER_URL = os.getenv("CELERY_BROKER_URL", "redis://localhost:6379/0")
CELERY_RESULT_BACKEND = os.getenv("CELERY_RESULT_BACKEND", "django-db")
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TIMEZONE = "UTC"
# Seeds run inline unless a worker is configured
CELERY_TASK_ALWAYS_EAGER = os.getenv("CELERY_TASK_ALWAYS_EAGER", "true").lower() == "true"
CELERY_TASK_EAGER_PROPAGATES = True
