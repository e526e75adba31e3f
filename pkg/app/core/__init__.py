"""Пакет базовой инфраструктуры."""
