from django.apps import AppConfig


class LggnnConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "lggnn"
    verbose_name = "LG-GNN embeddings and moment estimators"
