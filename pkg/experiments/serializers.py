from django.conf import settings
from rest_framework import serializers

from evaluation.splits import IN_SAMPLE, NEGATIVE_MODES, OUT_SAMPLE
from gcn.forward import GcnConfig
from graphons.families import GRAPHON_FAMILIES, from_spec, load_graphon_spec
from graphons.sampling import RHO_MODES
from lggnn_lab.exceptions import LabError
from regression.space import BOX, L1_BALL

from .models import ExperimentRun, SeedResult

METHODS = [choice for choice, _ in ExperimentRun.METHOD_CHOICES]


def _default_seeds():
    return list(settings.LGGNN_SETTINGS["DEFAULT_SEEDS"])


def _default_n():
    return settings.LGGNN_SETTINGS["DEFAULT_N"]


class GraphonSpecSerializer(serializers.Serializer):
    """Validates a graphon spec document by building the graphon it describes"""

    kind = serializers.ChoiceField(choices=sorted(GRAPHON_FAMILIES))
    name = serializers.CharField(required=False)
    description = serializers.CharField(required=False, allow_blank=True)

    def validate(self, attrs):
        spec = dict(self.initial_data)
        try:
            from_spec(spec)
        except LabError as exc:
            raise serializers.ValidationError(str(exc))
        return spec


class ExperimentConfigSerializer(serializers.Serializer):
    name = serializers.CharField(max_length=200, default="experiment")
    model = serializers.JSONField(allow_null=True, default=None)
    edge_list = serializers.CharField(allow_null=True, default=None)
    n = serializers.IntegerField(min_value=2, default=_default_n)
    rho_mode = serializers.ChoiceField(choices=RHO_MODES, default="one")
    L = serializers.IntegerField(min_value=0, default=2)
    d_policy = serializers.CharField(default="auto")
    method = serializers.ChoiceField(choices=METHODS, default="lggnn_box")
    protocol = serializers.ChoiceField(choices=[IN_SAMPLE, OUT_SAMPLE], default=IN_SAMPLE)
    p = serializers.FloatField(default=0.2)
    negatives = serializers.ChoiceField(choices=NEGATIVE_MODES, default="all")
    preserve_connectivity = serializers.BooleanField(default=False)
    ks = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1, default=[50, 100])
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=1, default=_default_seeds)
    output_dir = serializers.CharField(allow_blank=True, default="")
    space = serializers.ChoiceField(choices=[BOX, L1_BALL], default=BOX)
    box_bounds = serializers.ListField(child=serializers.FloatField(), allow_null=True, default=None)
    l1_radius = serializers.FloatField(allow_null=True, default=None)
    pls_components = serializers.IntegerField(min_value=1, allow_null=True, default=None)
    gcn = serializers.JSONField(default=dict)

    def validate_model(self, value):
        if value is None:
            return None
        if isinstance(value, str):
            try:
                value = load_graphon_spec(value)
            except FileNotFoundError as exc:
                raise serializers.ValidationError(str(exc))
        if not isinstance(value, dict):
            raise serializers.ValidationError("expected a preset name, a spec file path or a spec document")
        spec = GraphonSpecSerializer(data=value)
        if not spec.is_valid():
            raise serializers.ValidationError(spec.errors)
        return spec.validated_data

    def validate_d_policy(self, value):
        if value in ("auto", "n"):
            return value
        try:
            dimension = int(value)
        except ValueError:
            raise serializers.ValidationError(f"expected 'auto', 'n' or an integer, got {value!r}")
        if dimension < 1:
            raise serializers.ValidationError("embedding dimension must be >= 1")
        return str(dimension)

    def validate_p(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("holdout fraction must lie in (0, 1)")
        return value

    def validate_seeds(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError("seeds must be distinct")
        return value

    def validate(self, attrs):
        if attrs.get("model") is None and not attrs.get("edge_list"):
            raise serializers.ValidationError("either a graphon model or an edge list is required")
        coefficients = attrs["L"] + 1
        components = attrs.get("pls_components")
        if components is not None and components > coefficients:
            raise serializers.ValidationError(
                {"pls_components": f"must lie in 1..{coefficients} for L={attrs['L']}"}
            )
        bounds = attrs.get("box_bounds")
        if bounds is not None and (len(bounds) != coefficients or min(bounds) <= 0):
            raise serializers.ValidationError(
                {"box_bounds": f"expected {coefficients} positive bounds"}
            )
        if attrs.get("l1_radius") is not None and attrs["l1_radius"] <= 0:
            raise serializers.ValidationError({"l1_radius": "must be positive"})
        try:
            GcnConfig(**attrs.get("gcn") or {})
        except (TypeError, LabError) as exc:
            raise serializers.ValidationError({"gcn": str(exc)})
        return attrs


class SeedResultSerializer(serializers.ModelSerializer):
    class Meta:
        model = SeedResult
        fields = "__all__"
        read_only_fields = ("created_at",)


class ExperimentRunSerializer(serializers.ModelSerializer):
    seeds = SeedResultSerializer(many=True, read_only=True)
    method_name = serializers.CharField(source="get_method_display", read_only=True)

    class Meta:
        model = ExperimentRun
        fields = "__all__"
        read_only_fields = ("created_at", "completed_at")
