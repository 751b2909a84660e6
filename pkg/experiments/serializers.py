from rest_framework import serializers

from groundstates.physics import OMEGA_MAX, SCAN_MAX, SCAN_MIN
from .models import ExperimentRun


class ExperimentRunSerializer(serializers.ModelSerializer):
    """
    Serializer for a full run record.
    """
    duration = serializers.ReadOnlyField()

    class Meta:
        model = ExperimentRun
        fields = '__all__'
        read_only_fields = [field.name for field in ExperimentRun._meta.fields]


class ExperimentRunListSerializer(serializers.ModelSerializer):
    """
    Compact serializer for listing runs.
    """
    class Meta:
        model = ExperimentRun
        fields = ['id', 'command', 'status', 'exit_code', 'error_kind', 'started_at', 'finished_at']


def validate_frequency(value):
    if not 0.0 < value < OMEGA_MAX:
        raise serializers.ValidationError(
            "Frequency must lie in the open window (0, 3/16).", code='out_of_window'
        )
    return value


class RunConfigSerializer(serializers.Serializer):
    """
    Base serializer for a command's configuration section.

    Keys the serializer does not declare are rejected.
    """
    output_dir = serializers.CharField(required=False, allow_null=True, default=None)

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError(
                {key: ["Unknown configuration key."] for key in unknown}, code='unknown_key'
            )
        return super().to_internal_value(data)


class ShootingFieldsSerializer(RunConfigSerializer):
    """Ground-state solver settings shared by every command that solves."""
    ode_tolerance = serializers.FloatField(default=1e-12, min_value=1e-15, max_value=1e-3)
    bisection_tolerance = serializers.FloatField(default=1e-12, min_value=1e-15, max_value=1e-3)
    r_max = serializers.FloatField(required=False, allow_null=True, default=None, min_value=1.0)
    n = serializers.IntegerField(default=8193, min_value=9)
    max_bisections = serializers.IntegerField(default=60, min_value=40)
    newton_max_iter = serializers.IntegerField(default=40, min_value=1)

    def validate_n(self, value):
        if value % 2 == 0:
            raise serializers.ValidationError("Radial node count must be odd.")
        return value


class SolveConfigSerializer(ShootingFieldsSerializer):
    omega = serializers.FloatField(validators=[validate_frequency])
    one_d = serializers.BooleanField(default=False)


class BranchFieldsSerializer(ShootingFieldsSerializer):
    points = serializers.IntegerField(default=30, min_value=10)
    omega_min = serializers.FloatField(default=SCAN_MIN, validators=[validate_frequency])
    omega_max = serializers.FloatField(default=SCAN_MAX, validators=[validate_frequency])
    spacing = serializers.ChoiceField(choices=['log', 'linear'], default='log')
    workers = serializers.IntegerField(required=False, allow_null=True, default=None, min_value=1)

    def validate(self, attrs):
        if attrs['omega_min'] < SCAN_MIN or attrs['omega_max'] > SCAN_MAX:
            raise serializers.ValidationError(
                {'omega_min': ["Scan frequencies must lie in [0.005, 0.18]."]}
            )
        if attrs['omega_min'] >= attrs['omega_max']:
            raise serializers.ValidationError({'omega_min': ["omega_min must be below omega_max."]})
        return attrs


class ScanConfigSerializer(BranchFieldsSerializer):
    pass


class InvertConfigSerializer(BranchFieldsSerializer):
    mass = serializers.FloatField(min_value=0.0)
    tolerance = serializers.FloatField(default=1e-9, min_value=1e-14, max_value=1e-2)
    table = serializers.CharField(required=False, allow_null=True, default=None)


class MinimizeConfigSerializer(BranchFieldsSerializer):
    mass = serializers.FloatField(required=False, allow_null=True, default=None, min_value=0.0)
    mass_factor = serializers.FloatField(required=False, allow_null=True, default=None, min_value=0.0)
    time_step = serializers.FloatField(default=0.5, min_value=1e-8)
    max_steps = serializers.IntegerField(default=20000, min_value=1)
    stationarity_tolerance = serializers.FloatField(default=1e-9, min_value=1e-14)
    flow_r_max = serializers.FloatField(default=200.0, min_value=1.0)
    flow_n = serializers.IntegerField(default=8193, min_value=9)
    seed_width = serializers.FloatField(default=3.0, min_value=1e-3)
    compare = serializers.BooleanField(default=False)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if (attrs['mass'] is None) == (attrs['mass_factor'] is None):
            raise serializers.ValidationError({'mass': ["Give exactly one of mass and mass_factor."]})
        if attrs['flow_n'] % 2 == 0:
            raise serializers.ValidationError({'flow_n': ["Radial node count must be odd."]})
        return attrs


class SimulateConfigSerializer(ShootingFieldsSerializer):
    experiment = serializers.ChoiceField(choices=['stability', 'scattering'], default='stability')
    omega = serializers.FloatField(default=0.15, validators=[validate_frequency])
    delta = serializers.FloatField(default=1e-2, min_value=0.0)
    fraction = serializers.FloatField(default=0.5, min_value=0.0, max_value=1.0)
    sigma = serializers.FloatField(default=2.5, min_value=1e-3)
    T = serializers.FloatField(default=50.0, min_value=0.0)
    dt = serializers.FloatField(default=1e-3, min_value=1e-8)
    grid_points = serializers.IntegerField(default=512, min_value=64)
    box_length = serializers.FloatField(required=False, allow_null=True, default=None, min_value=1.0)
    v0x = serializers.FloatField(default=0.0)
    v0y = serializers.FloatField(default=0.0)
    seed = serializers.IntegerField(default=0, min_value=0)
    record_every = serializers.IntegerField(default=100, min_value=1)
    snapshot_every = serializers.IntegerField(required=False, allow_null=True, default=None, min_value=1)

    def validate_grid_points(self, value):
        if value & (value - 1):
            raise serializers.ValidationError("Field size must be a power of two.")
        return value


class VerifyConfigSerializer(ShootingFieldsSerializer):
    quick = serializers.BooleanField(default=False)
    seed = serializers.IntegerField(default=0, min_value=0)
    hamiltonian_tolerance = serializers.FloatField(default=1e-3, min_value=0.0)


CONFIG_SERIALIZERS = {
    'solve': SolveConfigSerializer,
    'scan': ScanConfigSerializer,
    'invert': InvertConfigSerializer,
    'minimize': MinimizeConfigSerializer,
    'simulate': SimulateConfigSerializer,
    'verify': VerifyConfigSerializer,
}
