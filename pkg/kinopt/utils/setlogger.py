import logging
import os

DEBUG_FORMAT = ("[%(levelname)s]%(filename)s:%(module)s:"
                "%(funcName)s:%(lineno)d:"
                "%(asctime)s:\n  %(message)s\n")
INFO_FORMAT = "[%(levelname)s]%(module)s:%(funcName)s:%(message)s\n"


def logfile_for(out: str, command: str) -> str:
    return os.path.join(out, f"kinopt_{command}.log")


def setconfig(out: str, command: str, debug: bool = False) -> str:
    """
    Routes the root logger to kinopt_<command>.log in out, keeping the
    previous log of that command as <log>.old. Returns the log path.
    """
    filename = logfile_for(out, command)
    if os.path.isfile(filename):
        os.replace(filename, filename + ".old")

    # force drops handlers left by an earlier command in the same process
    logging.basicConfig(filename=filename,
                        format=DEBUG_FORMAT if debug else INFO_FORMAT,
                        level=logging.DEBUG if debug else logging.INFO,
                        force=True)
    logging.getLogger(__name__).info(f"kinopt {command} logging to {filename}")
    return filename
