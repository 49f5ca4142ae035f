from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """One call of the experiment runner: a config and its seeds"""

    STATUS_CHOICES = [
        ("pending", "Pending"),
        ("running", "Running"),
        ("completed", "Completed"),
        ("failed", "Failed"),
    ]

    METHOD_CHOICES = [
        ("lggnn_box", "LG-GNN (box constrained)"),
        ("lggnn_pls", "LG-GNN (partial least squares)"),
        ("gcn_untrained", "Untrained GCN"),
    ]

    name = models.CharField(max_length=200)
    method = models.CharField(max_length=20, choices=METHOD_CHOICES)
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default="pending")
    config = models.JSONField(default=dict)
    aggregate = models.JSONField(default=dict, blank=True)
    output_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ["-created_at"]
        indexes = [
            models.Index(fields=["name", "created_at"], name="run_name_created_idx"),
            models.Index(fields=["status"], name="run_status_idx"),
        ]

    def __str__(self):
        return f"{self.name} [{self.method}] - {self.status}"

    @property
    def failed_seeds(self):
        return list(self.seeds.filter(status="failed").values_list("seed", flat=True))

    def mark_running(self):
        self.status = "running"
        self.save(update_fields=["status"])

    def mark_finished(self, aggregate):
        """Store the aggregate; the run fails only when no seed completed"""
        self.aggregate = aggregate
        completed = self.seeds.filter(status="completed").exists()
        self.status = "completed" if completed else "failed"
        self.completed_at = timezone.now()
        self.save(update_fields=["aggregate", "status", "completed_at"])


class SeedResult(models.Model):
    STATUS_CHOICES = [
        ("completed", "Completed"),
        ("failed", "Failed"),
    ]

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name="seeds")
    seed = models.IntegerField()
    status = models.CharField(max_length=10, choices=STATUS_CHOICES)
    metrics = models.JSONField(default=dict, blank=True)
    fit = models.JSONField(null=True, blank=True)
    diagnostics = models.JSONField(default=dict, blank=True)
    error = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        unique_together = ["run", "seed"]
        ordering = ["run", "seed"]

    def __str__(self):
        return f"{self.run.name} seed {self.seed} - {self.status}"
