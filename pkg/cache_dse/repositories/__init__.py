# cache_dse/repositories/__init__.py
# Репозитории кэша оценок: общий контракт и реализации In-Memory, SQLite, Redis.
