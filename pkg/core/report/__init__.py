from .protocol import ReportType, create_report, parse_report
from .writer import TRACE_COLUMNS, read_trace_csv, trace_row, write_report, write_trace_csv
