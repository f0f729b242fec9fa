"""
Тесты Singular p-Laplacian Toolkit.

Структура:
    tests/
    ├── unit/           # Модульные тесты (по файлу на модуль app/)
    ├── integration/    # Сквозные сверки: стрельба против Ньютона, лестница, развёртка
    └── e2e/            # Команды CLI во временных каталогах
"""
