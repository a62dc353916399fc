import logging
import logging.config
import logging.handlers
import os
import sys
import threading

LEVELS = {0: None, 1: logging.INFO, 2: logging.DEBUG}


def logger_thread(q):
    """Hand records queued by the sweep worker processes to this process's loggers until None arrives."""
    while True:
        record = q.get()
        if record is None:
            break
        logger = logging.getLogger(record.name)
        logger.handle(record)


def start_logger_thread(q) -> threading.Thread:
    lp = threading.Thread(target=logger_thread, args=(q,))
    lp.daemon = True
    lp.start()
    return lp


def stop_logger_thread(q, lp: threading.Thread) -> None:
    q.put(None)
    lp.join()


def configure_worker_logging(q, level=logging.DEBUG) -> None:
    """Route every record of a worker process through the shared queue."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.addHandler(logging.handlers.QueueHandler(q))
    root.setLevel(level)


def config_dir() -> str:
    if getattr(sys, 'frozen', False):
        return os.path.dirname(sys.executable)
    return os.path.dirname(os.path.abspath(__file__))


def load_logging_config(verbosity: int = 0, config_path: str = None) -> None:
    """fileConfig from logging.conf, falling back to stderr basicConfig; -v/-vv raise the level."""
    if config_path is None:
        config_path = os.path.join(config_dir(), 'logging.conf')
    if os.path.exists(config_path):
        logging.config.fileConfig(config_path, disable_existing_loggers=False)
    else:
        logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                            format='%(asctime)s %(processName)s %(name)s %(levelname)s: %(message)s')
    level = LEVELS.get(min(verbosity, 2))
    if level is not None:
        logging.getLogger().setLevel(level)
