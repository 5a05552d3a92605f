"""Command-line harness: configuration, verification suites and CSV output."""
