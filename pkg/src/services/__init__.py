from .base_service import BaseService
from .protocol_service import ProtocolService
from .inference_service import InferenceService
from .report_service import ReportService

__all__ = ['BaseService', 'ProtocolService', 'InferenceService', 'ReportService']
