"""Integration тесты — согласованность модулей: стрельба против Ньютона, лестница и закон подобия, структура ветвей."""
