"""Пакет тестов."""

