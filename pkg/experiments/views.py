from rest_framework import viewsets, filters, status
from rest_framework.response import Response
from rest_framework.permissions import AllowAny
from django_filters.rest_framework import DjangoFilterBackend
from .models import ExperimentRun
from .serializers import ExperimentRunSerializer, ExperimentRunListSerializer
from .filters import ExperimentRunFilter


class ExperimentRunViewSet(viewsets.ReadOnlyModelViewSet):
    """
    Read-only access to recorded command runs.

    Actions:
        - list: List runs, filterable by command, status and start time.
        - retrieve: Full run with its resolved config and summary.
    """
    queryset = ExperimentRun.objects.all()
    filter_backends = [DjangoFilterBackend, filters.SearchFilter, filters.OrderingFilter]
    filterset_class = ExperimentRunFilter
    search_fields = ['command', 'error_kind', 'error_message']
    ordering_fields = ['started_at', 'command', 'exit_code']
    permission_classes = [AllowAny]

    def get_serializer_class(self):
        if self.action == 'list':
            return ExperimentRunListSerializer
        return ExperimentRunSerializer

    def list(self, request, *args, **kwargs):
        """
        List runs.

        Returns:
            Response: API response with the run list.
        """
        queryset = self.filter_queryset(self.get_queryset())
        serializer = self.get_serializer(queryset, many=True)
        return Response({
            "data": serializer.data,
            "message": "Run list fetched successfully",
            "status_code": status.HTTP_200_OK
        }, status=status.HTTP_200_OK)

    def retrieve(self, request, *args, **kwargs):
        """
        Retrieve one run.

        Returns:
            Response: API response with the run details.
        """
        serializer = self.get_serializer(self.get_object())
        return Response({
            "data": serializer.data,
            "message": "Run detail fetched successfully",
            "status_code": status.HTTP_200_OK
        }, status=status.HTTP_200_OK)
