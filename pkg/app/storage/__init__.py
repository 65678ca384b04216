"""Export of benchmark records and solutions to CSV and JSON."""
