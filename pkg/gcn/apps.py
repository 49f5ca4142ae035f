from django.apps import AppConfig


class GcnBaselineConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "gcn"
    verbose_name = "Untrained GCN baseline"
