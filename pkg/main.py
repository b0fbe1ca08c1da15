import sys
from typing import List, Optional

from src.analysis.report import emit_report
from src.config.models import parse_config
from src.pipeline.runner import prepare_paths, run_experiment
from src.utils.errors import LabError
from src.utils.logger import get_logger


def main(argv: Optional[List[str]] = None) -> int:
    """
    Single entry point for every lab command. Exit status: 0 when the run has no
    violations, 1 when it reports violations, 2 on any lab error.
    """
    logger = get_logger("main")
    try:
        config = parse_config(argv)
    except LabError:
        logger.exception("Invalid configuration.")
        return 2

    # Prepare timestamped log/output paths
    paths = prepare_paths(config)
    logger = get_logger("main", log_file=paths["log_file"])
    logger.info(f"Logs will be saved in {paths['log_file']}")

    try:
        report, tables = run_experiment(config, logger=logger)
    except LabError:
        logger.exception(f"Error while running {config.command}.")
        return 2
    except KeyboardInterrupt:
        logger.warning(f"{config.command} interrupted by user (Ctrl+C).")
        return 2

    try:
        code = emit_report(report, paths["json"], html_path=paths["html"], tables=tables,
                           csv_path=paths["csv"], logger=logger)
    except LabError:
        logger.exception("Error during report generation.")
        return 2

    logger.info(f"Finished {config.command} with exit status {code}.")
    return code


if __name__ == "__main__":
    sys.exit(main())
