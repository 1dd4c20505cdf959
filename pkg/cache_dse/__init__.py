# cache_dse/__init__.py
# Пакет исследования пространства конфигураций кэш-памяти (I-cache + D-cache)
# по трассам обращений: симулятор, модели времени/энергии, NSGA-II и гиперобъем.

__version__ = "1.0.0"
