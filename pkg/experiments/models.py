from django.db import models


class ExperimentRun(models.Model):
    """
    One invocation of a lab command.

    Attributes:
        command (str): solve, scan, invert, minimize, simulate or verify.
        status (str): succeeded or failed.
        exit_code (int): Process exit code.
        error_kind (str): Machine-readable error kind, empty on success.
        error_message (str): Error message, empty on success.
        config (dict): Fully resolved configuration.
        summary (dict): Headline numbers of the result.
        output_dir (str): Directory holding the result files.
        schema_version (int): Output schema version.
        started_at (datetime): Start timestamp.
        finished_at (datetime): End timestamp.
    """
    COMMAND_CHOICES = [
        ('solve', 'solve'),
        ('scan', 'scan'),
        ('invert', 'invert'),
        ('minimize', 'minimize'),
        ('simulate', 'simulate'),
        ('verify', 'verify'),
    ]
    STATUS_CHOICES = [
        ('succeeded', 'Succeeded'),
        ('failed', 'Failed'),
    ]

    command = models.CharField(max_length=20, choices=COMMAND_CHOICES, db_index=True)
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, db_index=True)
    exit_code = models.PositiveSmallIntegerField(default=0)
    error_kind = models.CharField(max_length=50, blank=True)
    error_message = models.TextField(blank=True)

    config = models.JSONField(default=dict)
    summary = models.JSONField(default=dict, blank=True)
    output_dir = models.CharField(max_length=500, blank=True)
    schema_version = models.PositiveIntegerField(default=1)

    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-started_at']

    def __str__(self):
        return f"{self.command} #{self.pk} ({self.status})"

    @property
    def duration(self):
        if self.finished_at is None:
            return None
        return (self.finished_at - self.started_at).total_seconds()
