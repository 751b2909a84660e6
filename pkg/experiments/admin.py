from django.contrib import admin
from django.utils.html import format_html

from .models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'command', 'status_badge', 'exit_code', 'error_kind', 'started_at', 'duration_seconds')
    list_filter = ('command', 'status', 'error_kind', 'started_at')
    search_fields = ('command', 'error_kind', 'error_message', 'output_dir')
    readonly_fields = ('started_at', 'finished_at', 'duration_seconds')
    date_hierarchy = 'started_at'
    ordering = ['-started_at']
    list_per_page = 50

    fieldsets = (
        ('Run', {
            'fields': ('command', 'status', 'exit_code', 'output_dir', 'schema_version')
        }),
        ('Failure', {
            'fields': ('error_kind', 'error_message'),
            'classes': ('collapse',)
        }),
        ('Configuration & Summary', {
            'fields': ('config', 'summary'),
            'classes': ('wide',)
        }),
        ('Timing', {
            'fields': ('started_at', 'finished_at', 'duration_seconds'),
            'classes': ('collapse',)
        }),
    )

    def status_badge(self, obj):
        """Colored run status"""
        color = '#28a745' if obj.status == 'succeeded' else '#dc3545'
        return format_html('<strong style="color: {};">{}</strong>', color, obj.get_status_display())
    status_badge.short_description = "Status"
    status_badge.admin_order_field = 'status'

    def duration_seconds(self, obj):
        duration = obj.duration
        return '-' if duration is None else f'{duration:.1f} s'
    duration_seconds.short_description = "Duration"
