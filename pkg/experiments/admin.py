from django.contrib import admin

from .models import ExperimentRun, SeedResult


class SeedResultInline(admin.TabularInline):
    model = SeedResult
    extra = 0
    fields = ["seed", "status", "error"]
    readonly_fields = ["seed", "status", "error"]
    can_delete = False


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ["name", "method", "status", "seed_count", "created_at", "completed_at"]
    list_filter = ["method", "status", "created_at"]
    search_fields = ["name"]
    readonly_fields = ["config", "aggregate", "output_dir", "created_at", "completed_at"]
    date_hierarchy = "created_at"
    inlines = [SeedResultInline]

    def seed_count(self, obj):
        return obj.seeds.count()

    seed_count.short_description = "Seeds"


@admin.register(SeedResult)
class SeedResultAdmin(admin.ModelAdmin):
    list_display = ["run", "seed", "status", "auc_display"]
    list_filter = ["status"]
    search_fields = ["run__name"]
    readonly_fields = ["metrics", "fit", "diagnostics", "created_at"]

    def auc_display(self, obj):
        value = (obj.metrics or {}).get("auc_roc")
        return "-" if value is None else f"{value:.3f}"

    auc_display.short_description = "AUC-ROC"

    def get_queryset(self, request):
        return super().get_queryset(request).select_related("run")
