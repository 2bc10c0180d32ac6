"""
Command-line surface: argument parsing and the gen-data / train / eval commands.
"""

from .arguments import build_parser, flag_overrides, parse_args, parse_overrides
from .commands import COMMANDS, build_config, cmd_eval, cmd_gen_data, cmd_train

__all__ = [
    'build_parser',
    'flag_overrides',
    'parse_args',
    'parse_overrides',
    'COMMANDS',
    'build_config',
    'cmd_eval',
    'cmd_gen_data',
    'cmd_train',
]
