"""Base exception for analysis failures that should reach the user as a message."""


class AnalysisError(Exception):
    """An analysis step failed; user_message is safe to print on the command line."""

    def __init__(self, user_message: str):
        self.user_message = user_message
        super().__init__(user_message)
