from .leave_one_out import LooEntry, LooReport, leave_one_out

__all__ = ["LooEntry", "LooReport", "leave_one_out"]
