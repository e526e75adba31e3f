"""Пакет логирования."""

from app.logging.decorators import describe, logged

__all__ = ['describe', 'logged']
