"""
Django settings for the cohlab project.

Generated by 'django-admin startproject' and trimmed down: the project has no
database, no URL routing and no templates. It exists to host the `coherence`
app and its management commands.

Every tunable is read through python-decouple, so it can come from the
environment or from a `.env` file next to manage.py. The prefix is COHLAB_.
"""

from pathlib import Path
from decouple import config, Choices

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


SECRET_KEY = config('COHLAB_SECRET_KEY', default='cohlab-local-only-not-a-secret')

DEBUG = config('COHLAB_DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'coherence',
]

# Nothing is persisted; SimpleTestCase-based tests need no test database.
DATABASES = {}

USE_TZ = True

TIME_ZONE = 'UTC'


# Run defaults. Command-line flags take precedence over these values.

COHLAB = {
    'SEED': config('COHLAB_SEED', default=0, cast=int),
    'TOL': config('COHLAB_TOL', default=1e-9, cast=float),
    'SHOTS': config('COHLAB_SHOTS', default=10_000, cast=int),
    'ALPHA': config('COHLAB_ALPHA', default=1e-3, cast=float),
    'FORMAT': config('COHLAB_FORMAT', default='json', cast=Choices(['json', 'csv'])),
    'ROC_MAX_CUTS': config('COHLAB_ROC_MAX_CUTS', default=10_000, cast=int),
}


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'coherence': {
            'handlers': ['console'],
            'level': config('COHLAB_LOG_LEVEL', default='WARNING'),
            'propagate': False,
        },
    },
}
