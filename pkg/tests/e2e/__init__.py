"""End-to-end тесты — команды CLI, артефакты и коды выхода."""
