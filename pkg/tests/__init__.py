"""Tests de kirchhoff-lab"""
