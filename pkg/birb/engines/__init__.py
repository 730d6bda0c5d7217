"""Noisy simulation backends"""
