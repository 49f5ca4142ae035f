"""
URL configuration for the lggnn_lab project.

Only the admin is routed; experiment runs are browsed there.
"""

from django.contrib import admin
from django.urls import path

urlpatterns = [
    path("admin/", admin.site.urls),
]
