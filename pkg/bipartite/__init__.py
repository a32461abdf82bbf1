import logging

__version__ = '1.0.dev0'


def format_logger(logger, context, logOut=None):
    """
    Attach the package handlers to logger once and wrap it in an adapter
    carrying context (usually {'run': <command name>}).

    Parameters
    ----------
    logger : logging.Logger
    context : dict
        Extra fields for the record format, must contain 'run'.
    logOut : str or pathlib.Path, optional
        Log file. Added once per path.

    Returns
    -------
    logging.LoggerAdapter
    """
    logger_fmt = logging.Formatter(r'%(levelname)s:%(name)s: "%(run)s": %(message)s')

    if not any(type(h) is logging.StreamHandler for h in logger.handlers):
        logger_stream = logging.StreamHandler()
        logger_stream.setFormatter(logger_fmt)
        logger_stream.setLevel(logging.INFO)
        logger.setLevel(logging.DEBUG)
        logger.addHandler(logger_stream)

    if logOut is not None:
        logOut = str(logOut)
        known = [h.baseFilename for h in logger.handlers if isinstance(h, logging.FileHandler)]
        if not any(path.endswith(logOut) for path in known):
            logger_file = logging.FileHandler(logOut)
            logger_file.setLevel(logging.DEBUG)
            logger_file.setFormatter(logger_fmt)
            logger.addHandler(logger_file)

    return logging.LoggerAdapter(logger, context)


def release_logger(logger):
    """Close and detach every file handler on logger."""
    for handler in [h for h in logger.handlers if isinstance(h, logging.FileHandler)]:
        handler.close()
        logger.removeHandler(handler)
