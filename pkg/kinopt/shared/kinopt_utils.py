import logging
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib.metadata import PackageNotFoundError, version
from time import ctime
from typing import Callable, Sequence

from git import InvalidGitRepositoryError, NoSuchPathError, Repo


logger = logging.getLogger(__name__)


def check_file_is_there(check_file: str):

    if not os.path.isfile(check_file):
        raise FileNotFoundError(f"Cannot find file \"{check_file}\"")
    logger.debug(f"reading {check_file}")


def get_provenance_attrs() -> dict:
    # provenance recorded next to every JSON summary
    try:
        git_hash = Repo(search_parent_directories=True).head.object.hexsha
    except (InvalidGitRepositoryError, NoSuchPathError, ValueError):
        git_hash = "unknown"
    try:
        package_version = version("kinopt")
    except PackageNotFoundError:
        package_version = "unknown"
    return {
        "code_release_version": package_version,
        "git_hash": git_hash,
        "creationtime": str(ctime()),
        "hostname": platform.node(),
        "history": " ".join(sys.argv),
    }


def ordered_map(func: Callable, items: Sequence, threads: int = 1) -> list:
    """func over items on up to threads workers; results keep the order of items."""

    if threads < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    if threads == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))
