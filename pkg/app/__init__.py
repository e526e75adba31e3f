"""Пакет приложения."""

