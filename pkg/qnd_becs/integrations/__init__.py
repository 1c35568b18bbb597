from .table_writer import TableWriter, table_writer

__all__ = ["TableWriter", "table_writer"]
