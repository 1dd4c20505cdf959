# run_tests_and_capture.py
#
# Запуск pytest с сохранением полного вывода в test_results.txt.
# По умолчанию долгие проверки (маркер slow) пропускаются; `--all` включает их.

import subprocess
import sys
from pathlib import Path

RESULTS_FILE = Path("test_results.txt")


def run_tests(include_slow: bool = False) -> int:
    command = [sys.executable, "-m", "pytest", "tests"]
    if not include_slow:
        command += ["-m", "not slow"]
    print(f"Запуск: {' '.join(command)}")
    result = subprocess.run(command, capture_output=True, text=True)
    RESULTS_FILE.write_text(f"STDOUT:\n{result.stdout}STDERR:\n{result.stderr}", encoding="utf-8")
    status = "успешно" if result.returncode == 0 else f"с ошибками (код {result.returncode})"
    print(f"Тесты завершились {status}, вывод сохранен в {RESULTS_FILE}")
    return result.returncode


if __name__ == "__main__":
    sys.exit(run_tests(include_slow="--all" in sys.argv[1:]))
