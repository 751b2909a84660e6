from django.apps import AppConfig


class MinimizerConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'minimizer'
