from dao.model_format import parse_pomdp, read_model_text, serialize_abstraction, serialize_pomdp
from dao.report_dao import ReportDAO

__all__ = ["ReportDAO", "parse_pomdp", "read_model_text", "serialize_abstraction", "serialize_pomdp"]
