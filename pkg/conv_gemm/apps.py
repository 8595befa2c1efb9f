from django.apps import AppConfig


class ConvGemmConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'conv_gemm'
    verbose_name = 'im2col GEMM 변환'
