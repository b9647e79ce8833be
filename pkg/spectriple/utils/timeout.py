import concurrent.futures
import functools
import logging

from spectriple.constants import DEFAULT_CHECK_TIMEOUT_INT
from spectriple.core.exceptions import TimeOutException

logger = logging.getLogger("spectriple")


def timeout_decorator(default_timeout: int = DEFAULT_CHECK_TIMEOUT_INT):
    """Decorator bounding a certification batch by a number of seconds."""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            # Per-instance budget if the bound object defines one
            self = args[0] if args else None
            timeout = getattr(self, "_CHECK_TIMEOUT", default_timeout) if self is not None else default_timeout

            logger.debug("timeout seconds=%d", timeout)
            executor = concurrent.futures.ThreadPoolExecutor(max_workers=1)
            future = executor.submit(func, *args, **kwargs)
            try:
                return future.result(timeout=timeout)
            except concurrent.futures.TimeoutError:
                logger.error("Function '%s' timed out after %s seconds.", func.__name__, timeout)
                future.cancel()
                raise TimeOutException(f"Function '{func.__name__}' timed out after {timeout} seconds.")
            finally:
                executor.shutdown(wait=False)
        return wrapper
    return decorator
