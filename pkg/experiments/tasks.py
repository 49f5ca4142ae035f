import logging

from celery import shared_task

from .config import ExperimentConfig
from .ingestion import load_edge_list
from .runner import run_seed

logger = logging.getLogger(__name__)


@shared_task
def run_seed_task(config, seed):
    """Celery task running one seed of an experiment config document"""
    cfg = ExperimentConfig.from_document(config)
    graph = None if cfg.is_synthetic else load_edge_list(cfg.edge_list)
    record = run_seed(cfg, seed, graph=graph)
    logger.info(f"Seed task {cfg.name}/{seed} finished with status {record['status']}")
    return record
