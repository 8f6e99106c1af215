# Command endpoints for PoCo Lab
