# cli/layer_files.py
"""레이어 목록 파일(CSV) 읽기/쓰기.

첫 번째 유효 줄은 헤더이며, (앞 공백을 뺀) 첫 글자가 '#' 인 줄과 빈 줄은 무시합니다.
레이어 이름 칸은 공백을 그대로 보존합니다.
"""
import csv
import io
from pathlib import Path
from typing import Iterable, TextIO

from django.conf import settings

from conv_gemm.layers import ConvLayerConfig
from core.exceptions import EstimatorError, LayerFileError

LAYER_FIELDS = ('name', 'B', 'C_i', 'H_i', 'W_i', 'C_o', 'H_f', 'W_f', 'Strd', 'Pad')
_CONFIG_FIELDS = ('name', 'batch', 'in_channels', 'in_height', 'in_width', 'out_channels',
                  'filter_height', 'filter_width', 'stride', 'pad')


def parse_layer_lines(lines: Iterable[str], batch: int | None = None, elem_bytes: int = 4) -> list[ConvLayerConfig]:
    """batch 가 주어지면 파일의 B 열을 덮어씁니다."""
    configs = []
    seen_names = {}
    header_seen = False
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip('\r\n')
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        cells = next(csv.reader([line]))
        if not header_seen:
            if tuple(cell.strip() for cell in cells) != LAYER_FIELDS:
                raise LayerFileError(f"헤더는 {','.join(LAYER_FIELDS)} 이어야 합니다: {line}", line_number)
            header_seen = True
            continue
        if len(cells) != len(LAYER_FIELDS):
            raise LayerFileError(f"열 {len(LAYER_FIELDS)}개가 필요하지만 {len(cells)}개입니다.", line_number)

        name = cells[0]
        if name in seen_names:
            raise LayerFileError(f"레이어 이름 {name!r} 이 {seen_names[name]}번째 줄과 중복됩니다.", line_number)
        try:
            values = [int(cell) for cell in cells[1:]]
        except ValueError:
            raise LayerFileError(f"정수가 아닌 값이 있습니다: {line}", line_number) from None
        fields = dict(zip(_CONFIG_FIELDS, [name, *values]))
        if batch is not None:
            fields['batch'] = batch
        try:
            configs.append(ConvLayerConfig(elem_bytes=elem_bytes, **fields))
        except EstimatorError as e:
            raise LayerFileError(str(e), line_number) from e
        seen_names[name] = line_number

    if not header_seen:
        raise LayerFileError("헤더 줄이 없습니다.")
    return configs


def resolve_layer_path(name_or_path: str) -> Path:
    """번들 네트워크 이름(예: 'googlenet') 또는 파일 경로."""
    candidate = Path(name_or_path)
    if candidate.is_file():
        return candidate
    bundled = Path(settings.NETWORK_LAYER_DIR) / f"{name_or_path}.csv"
    if bundled.is_file():
        return bundled
    available = ', '.join(bundled_networks())
    raise LayerFileError(f"레이어 파일을 찾을 수 없습니다: {name_or_path!r} (번들: {available})")


def bundled_networks() -> list[str]:
    return sorted(path.stem for path in Path(settings.NETWORK_LAYER_DIR).glob('*.csv'))


def read_layer_file(name_or_path: str, batch: int | None = None, elem_bytes: int = 4) -> list[ConvLayerConfig]:
    path = resolve_layer_path(name_or_path)
    with open(path, 'r', encoding='utf-8') as f:
        return parse_layer_lines(f, batch=batch, elem_bytes=elem_bytes)


def _name_cell(name: str) -> str:
    """주석으로 읽히거나 공백이 잘릴 수 있는 이름은 따옴표로 감쌉니다."""
    if name != name.strip() or name.startswith('#') or any(ch in name for ch in ',"'):
        return '"' + name.replace('"', '""') + '"'
    return name


def write_layer_lines(configs: Iterable[ConvLayerConfig], stream: TextIO):
    stream.write(','.join(LAYER_FIELDS) + '\n')
    for cfg in configs:
        values = [str(getattr(cfg, name)) for name in _CONFIG_FIELDS[1:]]
        stream.write(','.join([_name_cell(cfg.name), *values]) + '\n')


def dump_layers(configs: Iterable[ConvLayerConfig]) -> str:
    buffer = io.StringIO()
    write_layer_lines(configs, buffer)
    return buffer.getvalue()
