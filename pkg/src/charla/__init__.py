"""Chatbot backend mixing controlled and open dialogue for teen wellbeing chats."""

__version__ = "0.1.0"
