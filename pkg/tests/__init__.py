# Initialize tests package