"""
Core application orchestration for the StarkChain simulator.
Runs a validated RunConfig or a compiled-in figure recipe and reports an exit status.
"""

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from starkchain.core.config import Settings, get_settings
from starkchain.core.errors import StarkChainError
from starkchain.core.logging import get_logger, log_shutdown_info, log_startup_info
from starkchain.models import RunConfig, figure_recipe
from starkchain.services.output_service import OutputWriter, write_manifest
from starkchain.services.pipeline_service import get_pipeline_service

logger = get_logger(__name__)


@dataclass
class RunOutcome:
    status: int
    summary: Dict[str, Any] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)
    error: Optional[str] = None


class StarkChainApp:
    """Main application class that dispatches runs and recipes."""

    def __init__(self, app_settings: Optional[Settings] = None):
        self.settings = app_settings or get_settings()

    def run(self, config: RunConfig, threads: Optional[int] = None) -> RunOutcome:
        """Execute one run; numerical and validation errors become a nonzero status."""
        threads = threads or self.settings.threads
        log_startup_info(config.command.value, config.output_dir, threads)
        started = time.perf_counter()
        writer = OutputWriter(config)
        try:
            summary, files = get_pipeline_service().run(config, writer, threads)
            outcome = RunOutcome(status=0, summary=summary, files=files)
        except StarkChainError as e:
            logger.error(f"❌ {config.command.value} failed: {e.detail}")
            outcome = RunOutcome(status=e.exit_code, files=list(writer.files), error=e.detail)
        except Exception as e:
            logger.exception(f"❌ {config.command.value} crashed: {e}")
            outcome = RunOutcome(status=1, files=list(writer.files), error=str(e))
        logger.info(f"{config.command.value} finished in {time.perf_counter() - started:.2f}s")
        log_shutdown_info(outcome.status)
        return outcome

    def reproduce(self, name: str, output_dir: Optional[str] = None, threads: Optional[int] = None) -> RunOutcome:
        """Run every config of a figure recipe and write a manifest of content hashes."""
        output_dir = output_dir or self.settings.output_dir
        recipe = figure_recipe(name, output_dir)
        files: List[Path] = []
        summary: Dict[str, Any] = {}
        for config in recipe.configs:
            outcome = self.run(config, threads)
            files.extend(outcome.files)
            summary[config.command.value] = outcome.summary
            if outcome.status != 0:
                return RunOutcome(status=outcome.status, summary=summary, files=files, error=outcome.error)
        root = Path(output_dir) / name
        files.append(write_manifest(root, files))
        return RunOutcome(status=0, summary=summary, files=files)


# Global app instance
app_instance = StarkChainApp()


def get_app() -> StarkChainApp:
    """Get the global application instance."""
    return app_instance
