"""
Resolution of command-line options.

Values come from Django settings, then an optional key=value file
(``--config``), then flags; later sources win. The resolved pipeline
options are echoed into every report through PipelineConfig.to_dict().
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional

from dotenv import dotenv_values

from governance.exceptions import ParameterError
from pipeline.config import PipelineConfig

logger = logging.getLogger(__name__)

PIPELINE_KEYS = (
    'window', 'stride', 'k', 'seed', 'measures', 'distance',
    'include_inactive', 'weight_source', 'normalize', 'workers', 'lenient',
)
PATH_KEYS = ('votes', 'balances', 'proposals', 'offchain_export', 'onchain_export', 'ballots', 'out')
FILE_KEYS = PIPELINE_KEYS + PATH_KEYS + ('format',)

INTEGER_KEYS = frozenset({'window', 'stride', 'k', 'seed', 'workers'})
BOOLEAN_KEYS = frozenset({'include_inactive', 'normalize', 'lenient'})
TRUE_WORDS = frozenset({'1', 'true', 'yes', 'on'})
FALSE_WORDS = frozenset({'0', 'false', 'no', 'off'})


def parse_bool(key: str, value) -> bool:
    if isinstance(value, bool):
        return value
    word = str(value).strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ParameterError(f"{key} must be true or false, got {value!r}")


def _coerce(key: str, value: str):
    if key in BOOLEAN_KEYS:
        return parse_bool(key, value)
    if key in INTEGER_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ParameterError(f"{key} must be an integer, got {value!r}") from None
    return value.strip()


def read_config_file(path) -> Dict[str, object]:
    """
    Parse a key=value configuration file.

    Keys are case-insensitive and may use dashes or underscores.

    Raises:
        ParameterError: missing file, unknown key or malformed value
    """
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"Config file {path} does not exist")

    values: Dict[str, object] = {}
    unknown = []
    for key, value in dotenv_values(path).items():
        name = key.strip().lower().replace('-', '_')
        if name not in FILE_KEYS:
            unknown.append(key)
            continue
        if value is None:
            raise ParameterError(f"Config key {key} has no value")
        values[name] = _coerce(name, value)
    if unknown:
        raise ParameterError(f"Unknown config key(s) in {path.name}: {', '.join(unknown)}")
    logger.debug("Read %d option(s) from %s", len(values), path)
    return values


@dataclass(frozen=True)
class CliConfig:
    command: str
    votes: Optional[Path] = None
    balances: Optional[Path] = None
    proposals: Optional[Path] = None
    offchain_export: Optional[Path] = None
    onchain_export: Optional[Path] = None
    ballots: Optional[Path] = None
    out: Optional[Path] = None
    fmt: str = 'json'
    overrides: Mapping[str, object] = field(default_factory=dict)
    verbosity: int = 1

    @classmethod
    def resolve(cls, command: str, options: Mapping[str, object]) -> 'CliConfig':
        """Merge the config file (if any) with the parsed command options."""
        values = read_config_file(options['config']) if options.get('config') else {}
        for key in FILE_KEYS:
            flag = options.get(key)
            if flag is not None:
                values[key] = flag

        paths = {key: Path(values[key]) for key in PATH_KEYS if values.get(key) is not None}
        return cls(
            command=command,
            fmt=str(values.get('format', 'json')).strip().lower(),
            overrides={key: values[key] for key in PIPELINE_KEYS if key in values},
            verbosity=int(options.get('verbosity', 1)),
            **paths,
        )

    def require(self, *names: str) -> None:
        missing = [f"--{name.replace('_', '-')}" for name in names if getattr(self, name) is None]
        if missing:
            raise ParameterError(f"{self.command} needs {', '.join(missing)}")

    @property
    def lenient(self) -> bool:
        return parse_bool('lenient', self.overrides.get('lenient', False))

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig.from_settings(**self.overrides)
