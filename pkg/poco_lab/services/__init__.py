# Services for PoCo Lab
