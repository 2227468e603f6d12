"""
Django settings for vbe_toolkit project.

The project has no web surface: Django supplies settings, the app
registry, logging configuration and the management commands that form
the command-line toolkit.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('SECRET_KEY', 'vbe-toolkit-offline-key')

DEBUG = os.getenv('VBE_DEBUG', 'false').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # local apps
    'governance',
    'metrics',
    'clustering',
    'pipeline',
    'theory_lab',
    'cli',
]

MIDDLEWARE = []


# Nothing is persisted, so no database is configured.
DATABASES = {}

USE_TZ = True
TIME_ZONE = 'UTC'


# oVBE pipeline defaults (k-means with k=3, Euclidean distance, windows of
# 10 proposals, min-entropy and Shannon entropy)
VBE_PIPELINE_DEFAULTS = {
    'window': 10,
    'stride': 10,
    'drop_partial_tail': True,
    'k': 3,
    'seed': 42,
    'n_init': 10,
    'max_iterations': 300,
    'tolerance': 1e-6,
    'measures': ['min_entropy', 'shannon'],
    'distance': 'euclidean',
    'include_inactive': True,
    'weight_source': 'static_balances',
    'normalize': False,
    'workers': int(os.getenv('VBE_WORKERS', '1')),
}

# Synthetic DAO defaults for the theory lab
VBE_THEORY_DEFAULTS = {
    'epsilon': 0.1,
    'quorum': 0.5,
    'utility_scale': 10.0,
}

# Brute-force oracles refuse instances larger than this
VBE_BRUTE_FORCE_LIMIT = 20

VBE_LOG_LEVEL = os.getenv('VBE_LOG_LEVEL', 'WARNING').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
        **{
            app: {
                'handlers': ['console'],
                'level': VBE_LOG_LEVEL,
                'propagate': False,
            }
            for app in ('governance', 'metrics', 'clustering', 'pipeline', 'theory_lab', 'cli')
        },
    },
}
