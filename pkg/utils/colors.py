"""
Color utilities for terminal output.
"""

import os
import sys


class Colors:
    """ANSI color codes for terminal output."""

    RED = '\033[91m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    CYAN = '\033[96m'

    BRIGHT_RED = '\033[1;91m'
    BRIGHT_GREEN = '\033[1;92m'
    BRIGHT_YELLOW = '\033[1;93m'
    BRIGHT_BLUE = '\033[1;94m'
    BRIGHT_MAGENTA = '\033[1;95m'

    BOLD = '\033[1m'
    DIM = '\033[2m'

    RESET = '\033[0m'


def colors_enabled() -> bool:
    """Colors only on an interactive terminal and when NO_COLOR is unset."""
    if os.environ.get("NO_COLOR"):
        return False
    return hasattr(sys.stdout, "isatty") and sys.stdout.isatty()


def colorize(text: str, color: str) -> str:
    """Apply color to text."""
    if not colors_enabled():
        return text
    return f"{color}{text}{Colors.RESET}"


def step(text: str) -> str:
    return colorize(f"[STEP] {text}", Colors.BRIGHT_BLUE)


def success(text: str) -> str:
    return colorize(f"[SUCCESS] {text}", Colors.BRIGHT_GREEN)


def error(text: str) -> str:
    return colorize(f"[ERROR] {text}", Colors.BRIGHT_RED)


def warning(text: str) -> str:
    return colorize(f"[WARNING] {text}", Colors.BRIGHT_YELLOW)


def info(text: str) -> str:
    return colorize(f"[INFO] {text}", Colors.CYAN)


def summary(text: str) -> str:
    return colorize(f"[SUMMARY] {text}", Colors.BRIGHT_MAGENTA)


def print_step(step_name: str, step_number: int) -> None:
    """Print a major step with box-style formatting."""
    label = f"Step {step_number}: {step_name}"
    box_width = max(50, len(label) + 10)
    print(f"\n╭{'─' * box_width}╮")
    print(f"│ {step(f'Step {step_number}:')} {step_name}{' ' * (box_width - len(label) - 8)}│")
    print(f"╰{'─' * box_width}╯")


def print_success(message: str) -> None:
    print(f"   ✓ {message}")


def print_warning(message: str) -> None:
    print(f"   {warning(message)}")


def print_error(message: str) -> None:
    print(f"   {error(message)}")
