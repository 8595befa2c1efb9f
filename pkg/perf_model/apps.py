from django.apps import AppConfig


class PerfModelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'perf_model'
    verbose_name = '실행 시간 및 병목 모델'
