"""
Routers package
"""
