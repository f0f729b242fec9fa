"""Unit тесты — по одному файлу на модуль app/, на малых сетках."""
