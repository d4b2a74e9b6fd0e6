"""
AlgorithmRegistry - decorator-based discovery of the learners the CLI can run.

Algorithm factories live in ``app/harness/definitions.py`` and register
themselves on import:

    @register_algorithm("universal", description="Grid of experts, one projection per round")
    def create_universal(context: AlgorithmContext) -> UniversalConfig:
        return LearnerBuilder(context.horizon).with_domain(context.domain)...build()
"""

import importlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from app.domains.base import DomainSpec
from app.errors import ConfigError
from app.experts.base import OnsProjection
from app.harness.families import StreamCertificates
from app.universal.config import UniversalConfig
from app.utils.log import logger

DEFINITIONS_MODULE = "app.harness.definitions"


@dataclass(frozen=True)
class AlgorithmContext:
    """Inputs an algorithm factory needs to build its configuration."""

    horizon: int
    domain: DomainSpec
    certificates: StreamCertificates
    seed: int = 0
    ons_projection: OnsProjection = "exact"


@dataclass(frozen=True)
class AlgorithmMetadata:
    name: str
    description: str = ""
    tags: List[str] = field(default_factory=list)


AlgorithmFactory = Callable[[AlgorithmContext], UniversalConfig]


@dataclass(frozen=True)
class AlgorithmDefinition:
    metadata: AlgorithmMetadata
    factory: AlgorithmFactory

    @property
    def name(self) -> str:
        return self.metadata.name

    def build(self, context: AlgorithmContext) -> UniversalConfig:
        return self.factory(context)


class AlgorithmRegistry:
    """Singleton registry of algorithm definitions."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._definitions = {}
            cls._instance._discovery_completed = False
        return cls._instance

    def register(self, definition: AlgorithmDefinition) -> None:
        if definition.name in self._definitions:
            logger.debug(f"Algorithm {definition.name} already registered, skipping")
            return
        self._definitions[definition.name] = definition

    def discover(self, force_refresh: bool = False) -> None:
        """Import the definitions module so its decorators run."""
        if self._discovery_completed and not force_refresh:
            return
        importlib.import_module(DEFINITIONS_MODULE)
        self._discovery_completed = True
        logger.debug(f"Discovered {len(self._definitions)} algorithm(s): {', '.join(self._definitions)}")

    def get(self, name: str) -> AlgorithmDefinition:
        """
        Look up an algorithm by its CLI name.

        Raises:
            ConfigError: If no algorithm has that name
        """
        self.discover()
        definition = self._definitions.get(name)
        if definition is None:
            raise ConfigError(f"Unknown algorithm '{name}'. Available: {', '.join(sorted(self._definitions))}")
        return definition

    def list_algorithms(self) -> List[AlgorithmDefinition]:
        self.discover()
        return sorted(self._definitions.values(), key=lambda d: d.name)

    @property
    def names(self) -> List[str]:
        return [d.name for d in self.list_algorithms()]


def register_algorithm(
    name: str,
    description: str = "",
    tags: Optional[List[str]] = None,
) -> Callable[[AlgorithmFactory], AlgorithmFactory]:
    """Decorator registering an algorithm factory under ``name``."""

    def decorator(func: AlgorithmFactory) -> AlgorithmFactory:
        metadata = AlgorithmMetadata(name=name, description=description or (func.__doc__ or "").strip(), tags=tags or [])
        AlgorithmRegistry().register(AlgorithmDefinition(metadata=metadata, factory=func))
        return func

    return decorator


def build_algorithm(name: str, context: AlgorithmContext) -> UniversalConfig:
    return AlgorithmRegistry().get(name).build(context)


def available_algorithms() -> Dict[str, str]:
    return {d.name: d.metadata.description for d in AlgorithmRegistry().list_algorithms()}
