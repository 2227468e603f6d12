from django.apps import AppConfig


class TheoryLabConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'theory_lab'
    verbose_name = 'Synthetic DAOs and theorem verification'
