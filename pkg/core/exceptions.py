# core/exceptions.py
"""추정기 전체에서 사용하는 예외 계층."""


class EstimatorError(Exception):
    """모든 추정기 오류의 기반 클래스."""


class LayerConfigError(EstimatorError, ValueError):
    """컨볼루션 레이어 설정이 유효하지 않을 때."""


class TilingError(EstimatorError, ValueError):
    """CTA/워프 타일링이 커버리지 불변식을 만족하지 않을 때."""


class MliUnavailableError(EstimatorError):
    """지원하지 않는 blk_K 에 대해 MLI 상수를 조회했을 때."""


class DeviceSpecError(EstimatorError, ValueError):
    """GPU 장치 사양 파일 또는 값이 잘못되었을 때."""


class ResourceError(EstimatorError):
    """SM 자원이 부족하여 활성 CTA 가 0 개일 때."""


class DesignOptionError(EstimatorError, ValueError):
    """설계 옵션 파일의 행이 잘못되었을 때."""


class LayerFileError(EstimatorError, ValueError):
    """레이어 파일 파싱 오류. 가능한 경우 줄 번호를 함께 보관합니다."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"{line_number}번째 줄: {message}"
        super().__init__(message)


class OracleCapExceeded(EstimatorError):
    """열거할 주소 수가 상한을 넘어 오라클이 실행을 거부했을 때."""

    def __init__(self, cap: int, requested: int):
        self.cap = cap
        self.requested = requested
        super().__init__(
            f"열거 주소 수 {requested:,}개가 상한 {cap:,}개를 초과합니다 (--oracle-cap 으로 조정)."
        )
