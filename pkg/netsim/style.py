# Terminal color styling for status lines written to stderr

import os
import sys

# Detect if the status stream supports color
def _supports_color(stream=None):
    stream = stream or sys.stderr
    if os.environ.get('NO_COLOR'):
        return False
    if not hasattr(stream, 'isatty') or not stream.isatty():
        return False
    return True

_COLOR = _supports_color()

# ANSI escape codes
RESET = '\033[0m' if _COLOR else ''
BOLD = '\033[1m' if _COLOR else ''
DIM = '\033[2m' if _COLOR else ''
ITALIC = '\033[3m' if _COLOR else ''

# Foreground colors
CYAN = '\033[36m' if _COLOR else ''
WHITE = '\033[37m' if _COLOR else ''

# Bright foreground colors
BRIGHT_RED = '\033[91m' if _COLOR else ''
BRIGHT_GREEN = '\033[92m' if _COLOR else ''
BRIGHT_YELLOW = '\033[93m' if _COLOR else ''


# --- Semantic helpers ---

def header(text):
    """Major section header with double-line border."""
    w = max(len(text) + 4, 60)
    border = '═' * w
    return f"{BOLD}{CYAN}{border}{RESET}\n{BOLD}{CYAN}  {text}{RESET}\n{BOLD}{CYAN}{border}{RESET}"

def subheader(text):
    """Sub-section header with single-line border."""
    w = max(len(text) + 4, 60)
    border = '─' * w
    return f"{CYAN}{border}{RESET}\n{BOLD}{WHITE}  {text}{RESET}\n{CYAN}{border}{RESET}"

def label(text):
    return f"{BOLD}{WHITE}{text}{RESET}"

def value(text):
    return f"{BRIGHT_GREEN}{text}{RESET}"

def info(text):
    """Informational / progress message."""
    return f"{DIM}{ITALIC}{text}{RESET}"

def success(text):
    return f"{BRIGHT_GREEN}{text}{RESET}"

def warning(text):
    return f"{BRIGHT_YELLOW}{text}{RESET}"

def error(text):
    return f"{BRIGHT_RED}{text}{RESET}"

def muted(text):
    return f"{DIM}{text}{RESET}"

def margin_colored(margin):
    """Green for a non-negative bound margin, red for a violation."""
    formatted = f"{margin:+,.2f}"
    if margin >= 0:
        return f"{BRIGHT_GREEN}{formatted}{RESET}"
    return f"{BRIGHT_RED}{formatted}{RESET}"

def status(text):
    """Write a styled status line to stderr; stdout is reserved for JSON output."""
    print(text, file=sys.stderr)

def print_key_values(pairs, title=None):
    """Aligned label/value block, the last row highlighted."""
    if title:
        status(f"\n{subheader(title)}")
    if not pairs:
        return
    width = max(len(lbl) for lbl, _ in pairs)
    for i, (lbl, val) in enumerate(pairs):
        text = str(val)
        if i == len(pairs) - 1:
            status(f"  {label(lbl.ljust(width))} : {value(text)}")
        else:
            status(f"  {lbl.ljust(width)} : {text}")
