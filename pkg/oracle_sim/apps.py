from django.apps import AppConfig


class OracleSimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'oracle_sim'
    verbose_name = '주소 스트림 오라클'
