"""Пакет валидации данных."""

