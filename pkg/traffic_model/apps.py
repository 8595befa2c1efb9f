from django.apps import AppConfig


class TrafficModelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'traffic_model'
    verbose_name = 'L1/L2/DRAM 트래픽 모델'
