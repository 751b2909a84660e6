import django_filters
from .models import ExperimentRun

class ExperimentRunFilter(django_filters.FilterSet):
    started_after = django_filters.DateTimeFilter(field_name="started_at", lookup_expr='gte')
    started_before = django_filters.DateTimeFilter(field_name="started_at", lookup_expr='lte')

    class Meta:
        model = ExperimentRun
        fields = {
            'command': ['exact', 'in'],
            'status': ['exact'],
            'exit_code': ['exact'],
            'error_kind': ['exact'],
        }
