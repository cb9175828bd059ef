"""Terminal output for the self-check and CLI summaries."""

import sys


class Colors:
    """ANSI color codes for terminal output."""

    RESET = "\033[0m"
    BOLD = "\033[1m"

    RED = "\033[38;5;211m"  # failure
    GREEN = "\033[38;5;157m"  # pass
    YELLOW = "\033[38;5;223m"  # warning
    BLUE = "\033[38;5;117m"  # info
    MAGENTA = "\033[38;5;183m"  # header frame
    GRAY = "\033[38;5;245m"
    WHITE = "\033[38;5;255m"


class Display:
    """Formatted console output; colors only when stdout is a terminal."""

    def __init__(self, verbose: bool = False, use_colors: bool = True):
        self.verbose = verbose
        self.use_colors = use_colors and sys.stdout.isatty()

    def _c(self, color: str) -> str:
        return color if self.use_colors else ""

    def header(self, title: str = "c2gen self-check"):
        bar = "═" * 58
        frame = f"{self._c(Colors.BOLD)}{self._c(Colors.MAGENTA)}"
        print()
        print(f"{frame}╔{bar}╗{self._c(Colors.RESET)}")
        print(
            f"{frame}║{self._c(Colors.RESET)}  {self._c(Colors.WHITE)}{self._c(Colors.BOLD)}"
            f"{title:<56}{self._c(Colors.RESET)}{frame}║{self._c(Colors.RESET)}"
        )
        print(f"{frame}╚{bar}╝{self._c(Colors.RESET)}")
        print()

    def info(self, message: str):
        print(f"{self._c(Colors.BLUE)}ℹ{self._c(Colors.RESET)} {message}")

    def success(self, message: str):
        print(f"{self._c(Colors.GREEN)}✓{self._c(Colors.RESET)} {message}")

    def warning(self, message: str):
        print(f"{self._c(Colors.YELLOW)}⚠{self._c(Colors.RESET)} {message}")

    def error(self, message: str):
        print(f"{self._c(Colors.RED)}✗{self._c(Colors.RESET)} {message}")

    def check(self, name: str, passed: bool, detail: str, seconds: float):
        """One result line: status, name, timing and (verbose or failing) detail."""
        mark = f"{self._c(Colors.GREEN)}✓ PASS" if passed else f"{self._c(Colors.RED)}✗ FAIL"
        print(
            f"  {mark}{self._c(Colors.RESET)} {self._c(Colors.WHITE)}{name}{self._c(Colors.RESET)} "
            f"{self._c(Colors.GRAY)}({seconds:.2f}s){self._c(Colors.RESET)}"
        )
        if detail and (self.verbose or not passed):
            print(f"      {self._c(Colors.GRAY)}{detail}{self._c(Colors.RESET)}")

    def summary(self, passed: int, total: int, seconds: float):
        print()
        print(f"{self._c(Colors.BOLD)}{'─' * 60}{self._c(Colors.RESET)}")
        color = Colors.GREEN if passed == total else Colors.RED
        print(
            f"  {self._c(color)}{passed}/{total} checks passed{self._c(Colors.RESET)} "
            f"{self._c(Colors.GRAY)}in {seconds:.1f}s{self._c(Colors.RESET)}"
        )
        print()

    def cells(self, ok: int, failed: int):
        """Grid completion line."""
        if failed:
            self.warning(f"{ok} cell(s) ok, {failed} failed")
        else:
            self.success(f"{ok} cell(s) ok")
