"""
URL configuration for soliton_lab project.

The `urlpatterns` list routes URLs to views. For more information please see:
    https://docs.djangoproject.com/en/5.2/topics/http/urls/
"""
from django.contrib import admin
from django.urls import path, include
from django.http import JsonResponse
from django.conf import settings


def api_root(request):
    return JsonResponse({
        'message': 'Soliton lab API is running',
        'schema_version': settings.LAB_SCHEMA_VERSION,
        'endpoints': {
            'admin': '/admin/',
            'runs': '/api/runs/',
        },
        'status': 'live'
    })


urlpatterns = [
    # Root endpoint
    path('', api_root, name='api_root'),

    # Admin panel
    path('admin/', admin.site.urls),

    # Apps
    path('api/', include('experiments.urls')),
]
