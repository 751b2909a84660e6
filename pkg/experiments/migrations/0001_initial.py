# Generated by Django 5.2 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('solve', 'solve'), ('scan', 'scan'), ('invert', 'invert'), ('minimize', 'minimize'), ('simulate', 'simulate'), ('verify', 'verify')], db_index=True, max_length=20)),
                ('status', models.CharField(choices=[('succeeded', 'Succeeded'), ('failed', 'Failed')], db_index=True, max_length=10)),
                ('exit_code', models.PositiveSmallIntegerField(default=0)),
                ('error_kind', models.CharField(blank=True, max_length=50)),
                ('error_message', models.TextField(blank=True)),
                ('config', models.JSONField(default=dict)),
                ('summary', models.JSONField(blank=True, default=dict)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('schema_version', models.PositiveIntegerField(default=1)),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-started_at'],
            },
        ),
    ]
