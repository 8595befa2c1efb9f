# core/logs.py
import logging
from datetime import datetime

logger = logging.getLogger('core')

_LEVELS = {
    'ERROR': logging.ERROR,
    'WARN': logging.WARNING,
    'WARNING': logging.WARNING,
    'INFO': logging.INFO,
    'DEBUG': logging.DEBUG,
}


def format_with_time(message: str) -> str:
    current_time = datetime.now().strftime('%H:%M:%S.%f')[:-3]
    return f"[{current_time}] {message}"


def log_with_time(message: str, level: str = "INFO", name: str | None = None):
    """시간과 함께 로그 메시지를 남깁니다. name 이 주어지면 해당 모듈 로거로 보냅니다."""
    target = logging.getLogger(name) if name else logger
    target.log(_LEVELS.get(level.upper(), logging.INFO), format_with_time(message))


def set_logger_levels(logging_config: dict, level: str) -> dict:
    """LOGGING 설정의 모든 앱 로거 레벨을 바꿉니다 (.env 를 늦게 읽는 설정 모듈용)."""
    for logger_config in logging_config.get('loggers', {}).values():
        logger_config['level'] = level
    return logging_config
