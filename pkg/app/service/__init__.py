"""Фазы пайплайна: приор, специализация, меш, метрики, демонстрация."""
