import argparse
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']

# named flag -> dotted config field
FLAG_FIELDS = {
    'seed': 'seed',
    'out': 'out_dir',
    'size': 'scene.dataset_size',
    'classes': 'scene.num_classes',
    'data_dir': 'scene.data_dir',
    'ratio': 'split.ratio',
    'epochs': 'train.epochs',
    'batch_size': 'train.batch_size',
    'lambda1': 'loss.weights.lambda1',
    'lambda2': 'loss.weights.lambda2',
    'lambda3': 'loss.weights.lambda3',
    'window': 'eval.window',
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        '--config',
        type=str,
        help='Key/value configuration file (section.field = value per line)'
    )
    parser.add_argument(
        '--seed',
        type=int,
        help='Run seed; scene and split seeds follow it unless set explicitly'
    )
    parser.add_argument(
        '--log-level',
        type=str,
        choices=LOG_LEVELS,
        default='INFO',
        help='Logging level'
    )
    parser.add_argument(
        '--log-file',
        type=str,
        help='Also write log records to this file'
    )


def _add_scene(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--size', type=int, help='Number of training scenes')
    parser.add_argument('--classes', type=int, help='Number of classes K, background included')
    parser.add_argument('--ratio', type=str, help='Labeled split: 1/16, 1/8, 1/4, 1/2 or full')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Semi-supervised senior/junior segmentation co-training on synthetic scenes',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        epilog='Any config field can also be set with --section.field value, e.g. --optim.base_lr 5e-4'
    )
    commands = parser.add_subparsers(dest='command', required=True)

    gen = commands.add_parser(
        'gen-data',
        help='Write a synthetic dataset and its split manifest',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    _add_common(gen)
    _add_scene(gen)
    gen.add_argument('--out', type=str, required=True, help='Dataset directory')

    train = commands.add_parser(
        'train',
        help='Co-train a senior/junior pair and evaluate the junior',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    _add_common(train)
    _add_scene(train)
    train.add_argument('--out', type=str, help='Run directory (preset root with --preset)')
    train.add_argument('--data-dir', type=str, help='Read scenes from a gen-data directory')
    train.add_argument('--epochs', type=int, help='Training epochs over the unlabeled pool; 0 evaluates only')
    train.add_argument('--batch-size', type=int, help='Labeled and unlabeled batch size')
    train.add_argument('--lambda1', type=float, help='Supervised loss weight')
    train.add_argument('--lambda2', type=float, help='Cross pseudo-label consistency weight')
    train.add_argument('--lambda3', type=float, help='Distillation weight')
    train.add_argument('--window', type=int, help='Sliding evaluation window')
    train.add_argument('--preset', type=str, help='Ablation preset: table5, table6 or table7')
    train.add_argument('--seeds', type=int, nargs='+', help='Seeds for --preset (default: --seed)')
    train.add_argument('--resume', type=str, help='Continue from a checkpoint written by a previous run')
    train.add_argument('--threads', type=int, help='Evaluation threads (default: SEGKC_THREADS or physical cores)')
    train.add_argument('--no-progress', action='store_true', help='Hide the progress bar')

    ev = commands.add_parser(
        'eval',
        help='Score a checkpoint on the validation scenes',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    _add_common(ev)
    ev.add_argument('--checkpoint', type=str, required=True, help='Checkpoint file (ckpt.final)')
    ev.add_argument('--branch', type=str, choices=['junior', 'senior'], default='junior', help='Branch to score')
    ev.add_argument('--data-dir', type=str, help='Read validation scenes from a gen-data directory')
    ev.add_argument('--no-sliding', action='store_true', help='Predict the whole image in one pass')
    ev.add_argument('--window', type=int, help='Sliding evaluation window')
    ev.add_argument('--out', type=str, help='Directory for iou_per_class.csv (default: next to the checkpoint)')
    ev.add_argument('--threads', type=int, help='Evaluation threads (default: SEGKC_THREADS or physical cores)')
    return parser


def parse_overrides(extra: Sequence[str]) -> Dict[str, str]:
    """Turn leftover ``--section.field value`` / ``--section.field=value`` tokens into overrides."""
    overrides: Dict[str, str] = {}
    tokens = list(extra)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith('--') or len(token) == 2:
            raise ConfigError(f"unexpected argument '{token}'")
        key, sep, value = token[2:].partition('=')
        if not sep:
            if i + 1 >= len(tokens) or tokens[i + 1].startswith('--'):
                raise ConfigError(f"missing value for --{key}", field=key.replace('-', '_'))
            value = tokens[i + 1]
            i += 1
        if '.' not in key:
            raise ConfigError(f"unknown option --{key}")
        overrides[key.replace('-', '_')] = value
        i += 1
    return overrides


def parse_args(argv: Optional[List[str]] = None) -> Tuple[argparse.Namespace, Dict[str, str]]:
    """
    Parse command line arguments.

    Returns:
        Parsed arguments namespace and the generic dotted overrides
    """
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    return args, parse_overrides(extra)


def flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted overrides for every named flag that was given."""
    overrides: Dict[str, Any] = {}
    for flag, key in FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, 'no_sliding', False):
        overrides['eval.sliding'] = False
    return overrides
