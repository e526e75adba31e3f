"""Пакет CLI-команд."""

