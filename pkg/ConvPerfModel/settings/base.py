# ConvPerfModel/settings/base.py

from pathlib import Path
import environ  # django-environ 임포트

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# django-environ 초기화 (타입과 기본값을 함께 선언)
env = environ.Env(
    DEBUG=(bool, False),
    DEFAULT_DEVICE=(str, 'titan-xp'),
    ORACLE_ENUMERATION_CAP=(int, 100_000_000),
    ESTIMATOR_WORKERS=(int, 4),
    DEFAULT_ELEM_BYTES=(int, 4),
    DEFAULT_REGS_PER_THREAD=(int, 128),
    LOG_LEVEL=(str, 'INFO'),
)

# 번들 데이터 경로
CONFIG_DIR = BASE_DIR / 'config'
DEVICE_PRESETS_DIR = CONFIG_DIR / 'devices'
DESIGN_OPTIONS_PATH = CONFIG_DIR / 'design_options.yaml'
NETWORK_LAYER_DIR = CONFIG_DIR / 'networks'

# SECURITY WARNING: keep the secret key used in production secret!
# DB/세션을 쓰지 않으므로 로컬 기본값을 허용합니다.
SECRET_KEY = env('SECRET_KEY', default='django-insecure-conv-perf-model-local-key')

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'core.apps.CoreConfig',
    'conv_gemm.apps.ConvGemmConfig',
    'traffic_model.apps.TrafficModelConfig',
    'perf_model.apps.PerfModelConfig',
    'oracle_sim.apps.OracleSimConfig',
    'cli.apps.CliConfig',
]

# 추정기는 순수 계산만 하므로 데이터베이스를 사용하지 않습니다.
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'ko-kr'
TIME_ZONE = 'Asia/Seoul'  # 한국 표준시
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# --- 추정기 설정 ---
DEFAULT_DEVICE = env('DEFAULT_DEVICE')
ORACLE_ENUMERATION_CAP = env.int('ORACLE_ENUMERATION_CAP')
ESTIMATOR_WORKERS = env.int('ESTIMATOR_WORKERS')
DEFAULT_ELEM_BYTES = env.int('DEFAULT_ELEM_BYTES')
DEFAULT_REGS_PER_THREAD = env.int('DEFAULT_REGS_PER_THREAD')

LOG_LEVEL = env('LOG_LEVEL')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        }
    },
    'loggers': {
        'core': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'conv_gemm': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'traffic_model': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'perf_model': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'oracle_sim': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'cli': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
    },
}
