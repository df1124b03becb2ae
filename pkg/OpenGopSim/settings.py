"""
Django settings for OpenGopSim project.

Simulador estructural y kit de conformidad para conmutación de resolución
con open GOP en streaming adaptativo HTTP.

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent
MEDIA_ROOT = os.path.join(BASE_DIR, 'media')


# SECURITY WARNING: la clave solo protege el historial local de corridas
SECRET_KEY = os.environ.get('OGOP_SIM_SECRET_KEY', 'django-insecure-ogopsim-local-only')

DEBUG = False

ALLOWED_HOSTS: list[str] = []


# Application definition

INSTALLED_APPS = [
    'core.apps.CoreConfig',
    'django.contrib.contenttypes',
    'django_q'
]

# Configuración de Django-Q2 (corridas encoladas con sim run --enqueue)
Q_CLUSTER = {
    'name': 'ogop_sim',
    'workers': 2,
    'recycle': 500,
    'timeout': 3600,     # Una grilla completa de escenarios entra holgada en 1h
    'retry': 7200,       # Debe ser > timeout
    'orm': 'default',    # Usa la DB, no Redis
    'save_limit': 250,
    'queue_limit': 100,
    'label': 'Django Q',
    'sync': False,
}

MIDDLEWARE: list[str] = []


# Database

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
        'OPTIONS': {
            'timeout': 30,
        },
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Internationalization

LANGUAGE_CODE = 'es-ar'

TIME_ZONE = 'America/Argentina/Buenos_Aires'

USE_I18N = True

USE_TZ = True


# =============================================================================
# SIMULADOR
# =============================================================================

# Limita los workers del fan-out por representación (opcional)
OGOP_SIM_THREADS = max(1, int(os.environ.get('OGOP_SIM_THREADS', '4')))

OGOP_SIM = {
    'VERSION': '1.0.0',

    # Dígitos significativos de los floats en JSON/CSV (golden files estables)
    'FLOAT_SIGNIFICANT_DIGITS': 6,

    # Tabla de niveles: [máximo tamaño de imagen luma, general_level_idc mínimo].
    # Valores de MaxLumaPs por nivel.
    'LEVEL_TABLE': [
        [552960, 48],      # 3.0
        [983040, 51],      # 3.1
        [2228224, 64],     # 4.0
        [8912896, 80],     # 5.0
        [35651584, 96],    # 6.0
    ],

    'ABR': {
        'safety_margin': 0.9,
        'panic_threshold_s': 2.0,
        'buffer_capacity_s': 30.0,
        'initial_buffer_s': 4.0,
    },

    # Offsets medidos de calidad en RASL tras conmutar (dB)
    'TRANSITION': {
        'up_mean_below_high_db': 1.77,
        'up_mean_above_low_db': 2.82,
        'down_mean_below_high_db': 3.72,
        'down_mean_above_low_db': 0.87,
        'down_first_rasl_drop_db': 2.92,
    },

    # Ganancias BD-rate medidas (open GOP vs closed GOP, GOP 32) usadas solo
    # como nota al lado del cociente de exposición estructural
    'MEASURED_GAIN_IRAP64_PCT': -9.22,
    'MEASURED_GAIN_IRAP256_PCT': -2.35,
}


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,

    # 1. FORMATTERS: Cómo se ve el texto
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },

    # 2. HANDLERS: A dónde va el log
    'handlers': {
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'level': 'DEBUG',
            'class': 'logging.FileHandler',
            'filename': os.path.join(BASE_DIR, 'debug.log'),
            'formatter': 'verbose',
            'delay': True,
        },
    },

    # 3. LOGGERS: Configuración por módulo
    'loggers': {
        '': {
            'handlers': ['console', 'file'],
            'level': 'INFO',
            'propagate': True,
        },
        'core': {
            'handlers': ['console', 'file'],
            'level': 'DEBUG',
            'propagate': False,
        },
        # Configuración específica para el framework Django
        'django': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}
