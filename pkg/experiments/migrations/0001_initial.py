# Generated by Django 5.2.3

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("name", models.CharField(max_length=200)),
                (
                    "method",
                    models.CharField(
                        choices=[
                            ("lggnn_box", "LG-GNN (box constrained)"),
                            ("lggnn_pls", "LG-GNN (partial least squares)"),
                            ("gcn_untrained", "Untrained GCN"),
                        ],
                        max_length=20,
                    ),
                ),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("pending", "Pending"),
                            ("running", "Running"),
                            ("completed", "Completed"),
                            ("failed", "Failed"),
                        ],
                        default="pending",
                        max_length=10,
                    ),
                ),
                ("config", models.JSONField(default=dict)),
                ("aggregate", models.JSONField(blank=True, default=dict)),
                ("output_dir", models.CharField(blank=True, max_length=500)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("completed_at", models.DateTimeField(blank=True, null=True)),
            ],
            options={
                "ordering": ["-created_at"],
                "indexes": [
                    models.Index(fields=["name", "created_at"], name="run_name_created_idx"),
                    models.Index(fields=["status"], name="run_status_idx"),
                ],
            },
        ),
        migrations.CreateModel(
            name="SeedResult",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("seed", models.IntegerField()),
                (
                    "status",
                    models.CharField(
                        choices=[("completed", "Completed"), ("failed", "Failed")],
                        max_length=10,
                    ),
                ),
                ("metrics", models.JSONField(blank=True, default=dict)),
                ("fit", models.JSONField(blank=True, null=True)),
                ("diagnostics", models.JSONField(blank=True, default=dict)),
                ("error", models.TextField(blank=True)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="seeds",
                        to="experiments.experimentrun",
                    ),
                ),
            ],
            options={
                "ordering": ["run", "seed"],
                "unique_together": {("run", "seed")},
            },
        ),
    ]
