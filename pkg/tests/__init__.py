# tests/__init__.py
# Пакет тестов; reference_sim импортируется из тестов симулятора как tests.reference_sim.
